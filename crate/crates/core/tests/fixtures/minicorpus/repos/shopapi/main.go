package main

import (
	"example.com/shopapi"
	_ "github.com/gin-gonic/gin"
)

func main() {
	r := shopapi.SetupRouter()
	r.Run(":8080")
}
