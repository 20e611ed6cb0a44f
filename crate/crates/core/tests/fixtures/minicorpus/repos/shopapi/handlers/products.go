package handlers

import (
	"net/http"

	"github.com/gin-gonic/gin"
)

type Product struct {
	SKU   string  `json:"sku"`
	Price float64 `json:"price"`
}

var products = map[string]Product{}

func GetProduct(c *gin.Context) {
	sku := c.Param("sku")
	p, ok := products[sku]
	if !ok {
		c.AbortWithStatusJSON(http.StatusNotFound, gin.H{"error": "unknown sku"})
		return
	}
	c.JSON(http.StatusOK, p)
}

func ListProducts(c *gin.Context) {
	sort := c.DefaultQuery("sort", "price")
	out := make([]Product, 0, len(products))
	for _, p := range products {
		out = append(out, p)
	}
	c.JSON(http.StatusOK, gin.H{"sort": sort, "products": out})
}

func CreateProduct(c *gin.Context) {
	var p Product
	if err := c.ShouldBindJSON(&p); err != nil {
		c.AbortWithStatus(http.StatusBadRequest)
		return
	}
	products[p.SKU] = p
	c.JSON(http.StatusCreated, p)
}

func DeleteProduct(c *gin.Context) {
	sku := c.Param("sku")
	delete(products, sku)
	c.Status(http.StatusNoContent)
}
