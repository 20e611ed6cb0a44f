#include "cocos2d.h"
#include "MenuScene.h"
#include "GameScene.h"

bool MenuScene::setupMenu()
{
    if (!cocos2d::Scene::init())
    {
        return false;
    }
    auto visibleSize = cocos2d::Director::getInstance()->getVisibleSize();
    auto title = cocos2d::Label::createWithTTF("Space", "fonts/arial.ttf", 48);
    title->setPosition(cocos2d::Vec2(visibleSize.width / 2, visibleSize.height * 0.75f));
    this->addChild(title, 1);
    return true;
}

void MenuScene::startGame(cocos2d::Ref* sender)
{
    auto scene = GameScene::createScene();
    cocos2d::Director::getInstance()->replaceScene(cocos2d::TransitionFade::create(0.5f, scene));
}

void MenuScene::addLogo()
{
    Sprite* logo = Sprite::create("logo.png");
    logo->setScale(0.5f);
    addChild(logo);
}
