package blog

import (
	"net/http"

	"github.com/gin-gonic/gin"
)

func GetPost(c *gin.Context) {
	slug := c.Param("slug")
	post, err := store.Find(slug)
	if err != nil {
		c.JSON(http.StatusNotFound, gin.H{"error": err.Error()})
		return
	}
	c.JSON(http.StatusOK, post)
}

func ListPosts(c *gin.Context) {
	page := c.DefaultQuery("page", "1")
	tag := c.Query("tag")
	c.JSON(http.StatusOK, gin.H{"page": page, "tag": tag, "posts": store.All()})
}

func CreatePost(c *gin.Context) {
	var p Post
	if err := c.ShouldBindJSON(&p); err != nil {
		c.AbortWithStatusJSON(http.StatusBadRequest, gin.H{"error": err.Error()})
		return
	}
	c.JSON(http.StatusCreated, store.Save(p))
}

func DeletePost(c *gin.Context) {
	store.Remove(c.Param("slug"))
	c.Status(http.StatusNoContent)
}
