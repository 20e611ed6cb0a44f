#pragma once

namespace cocos2d {

/** Node is the base element of the Scene Graph. */
class Node : public Ref
{
public:
    /** Sets the position (x,y) of the node in its parent's coordinate system. */
    virtual void setPosition(const Vec2 &position);

    /** Sets the anchor point in percent. */
    virtual void setAnchorPoint(const Vec2& anchorPoint);

    /** Sets the scale (x and y) of the node. */
    virtual void setScale(float scale);

    /** Changes the tag that is used to identify the node easily. */
    virtual void setTag(int tag);

    /** Executes an action, and returns the action that is executed. */
    virtual Action* runAction(Action* action);

    /** Stops and removes all actions from the running action list. */
    void stopAllActions();

    /** Adds a child to the container with a local z-order. */
    virtual void addChild(Node * child, int localZOrder);
};

} // namespace cocos2d
