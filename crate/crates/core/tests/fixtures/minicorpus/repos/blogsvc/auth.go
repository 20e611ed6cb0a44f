package blog

import (
	"net/http"

	"github.com/gin-gonic/gin"
)

func Login(c *gin.Context) {
	user := c.PostForm("user")
	pass := c.PostForm("password")
	if !check(user, pass) {
		c.Redirect(http.StatusFound, "/login?failed=1")
		return
	}
	c.SetCookie("session", sign(user), 3600, "/", "", false, true)
	c.Redirect(http.StatusFound, "/")
}

func Logout(c *gin.Context) {
	c.SetCookie("session", "", -1, "/", "", false, true)
	c.Redirect(http.StatusFound, "/")
}

func check(user, pass string) bool {
	return user != "" && pass == "secret"
}
