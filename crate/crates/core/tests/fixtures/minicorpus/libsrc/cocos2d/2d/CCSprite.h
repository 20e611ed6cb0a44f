#pragma once

namespace cocos2d {

/** Sprite is a 2d image. */
class Sprite : public Node
{
public:
    /** Creates a sprite with an image filename. */
    static Sprite* create(const std::string& filename);
};

/** Label is a subclass of Node that knows how to render text labels. */
class Label : public Node
{
public:
    /** Allocates and initializes a Label, based on a TrueType font file. */
    static Label* createWithTTF(const std::string& text, const std::string& fontFilePath, float fontSize);

    /** Sets the text color of the label. */
    virtual void setColor(const Color3B& color);
};

/** Scene is a subclass of Node that is used only as an abstract concept. */
class Scene : public Node
{
public:
    /** Initializes an empty scene. */
    virtual bool init();
};

/** Moves a Node object to the position x,y. */
class MoveTo : public ActionInterval
{
public:
    /** Creates the action. */
    static MoveTo* create(float duration, const Vec2& position);
};

} // namespace cocos2d
