#pragma once

namespace cocos2d {

class Scene;

/** Class that creates and handles the main window and manages how and when to execute the scenes. */
class Director : public Ref
{
public:
    /** Returns a shared instance of the director. */
    static Director* getInstance();

    /** Returns visible size of the OpenGL view in points. */
    Size getVisibleSize() const;

    /** Replaces the running scene with a new one. The running scene is terminated. */
    void replaceScene(Scene *scene);

    Size getWinSize() const;
};

} // namespace cocos2d
