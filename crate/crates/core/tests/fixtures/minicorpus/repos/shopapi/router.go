package shopapi

import (
	"example.com/shopapi/handlers"
	"github.com/gin-gonic/gin"
)

// SetupRouter wires every route.
func SetupRouter() *gin.Engine {
	router := gin.Default()
	router.Use(RequestID())
	v1 := router.Group("/api/v1")
	{
		v1.GET("/users", handlers.ListUsers)
		v1.GET("/users/:id", handlers.GetUser)
		v1.POST("/users", handlers.CreateUser)
		v1.DELETE("/users/:id", handlers.DeleteUser)
	}
	router.GET("/health", func(c *gin.Context) {
		c.String(200, "ok")
	})
	return router
}
