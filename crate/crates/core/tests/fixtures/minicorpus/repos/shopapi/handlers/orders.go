package handlers

import (
	"net/http"
	"strconv"

	"github.com/gin-gonic/gin"
)

type Order struct {
	ID    string   `json:"id"`
	Items []string `json:"items"`
}

var orders = []Order{}

func GetOrder(c *gin.Context) {
	id := c.Param("id")
	for _, o := range orders {
		if o.ID == id {
			c.JSON(http.StatusOK, o)
			return
		}
	}
	c.Status(http.StatusNotFound)
}

func ListOrders(c *gin.Context) {
	status := c.DefaultQuery("status", "open")
	c.Header("X-Total-Count", strconv.Itoa(len(orders)))
	c.JSON(http.StatusOK, gin.H{"status": status, "orders": orders})
}

func UpdateOrder(c *gin.Context) {
	id := c.Param("id")
	var body Order
	if err := c.BindJSON(&body); err != nil {
		return
	}
	body.ID = id
	c.JSON(http.StatusOK, body)
}
