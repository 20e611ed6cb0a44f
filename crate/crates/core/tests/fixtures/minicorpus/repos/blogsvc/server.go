package blog

import "github.com/gin-gonic/gin"

func NewServer() *gin.Engine {
	engine := gin.New()
	engine.Use(gin.Logger(), gin.Recovery())
	api := engine.Group("/api")
	api.GET("/posts", ListPosts)
	api.GET("/posts/:slug", GetPost)
	admin := api.Group("/admin", gin.BasicAuth(gin.Accounts{"admin": "secret"}))
	admin.POST("/posts", CreatePost)
	admin.DELETE("/posts/:slug", DeletePost)
	engine.POST("/login", Login)
	return engine
}

func Ping(r *gin.Engine) {
	r.Group("/ping").GET("", func(c *gin.Context) { c.String(http.StatusOK, "pong") })
}

func init() {
	gin.SetMode(gin.ReleaseMode)
}
