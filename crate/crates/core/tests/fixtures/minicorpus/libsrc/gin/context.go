package gin

import "net/http"

// Context is the most important part of gin. It allows us to pass variables between
// middleware, manage the flow, validate the JSON of a request and render a JSON response.
type Context struct {
	Request *http.Request
	Keys    map[string]any
}

// Next should be used only inside middleware.
// It executes the pending handlers in the chain inside the calling handler.
func (c *Context) Next() {}

// Abort prevents pending handlers from being called.
func (c *Context) Abort() {}

// AbortWithStatus calls `Abort()` and writes the headers with the specified status code.
func (c *Context) AbortWithStatus(code int) {}

// AbortWithStatusJSON calls `Abort()` and then `JSON` internally.
// This method stops the chain, writes the status code and return a JSON body.
func (c *Context) AbortWithStatusJSON(code int, jsonObj any) {}

// Set is used to store a new key/value pair exclusively for this context.
func (c *Context) Set(key string, value any) {}

// Param returns the value of the URL param.
// It is a shortcut for c.Params.ByName(key).
func (c *Context) Param(key string) string { return "" }

// Query returns the keyed url query value if it exists,
// otherwise it returns an empty string `("")`.
func (c *Context) Query(key string) string { return "" }

// DefaultQuery returns the keyed url query value if it exists,
// otherwise it returns the specified defaultValue string.
func (c *Context) DefaultQuery(key, defaultValue string) string { return defaultValue }

// PostForm returns the specified key from a POST urlencoded form or multipart form
// when it exists, otherwise it returns an empty string `("")`.
func (c *Context) PostForm(key string) string { return "" }

// BindJSON is a shortcut for c.MustBindWith(obj, binding.JSON).
func (c *Context) BindJSON(obj any) error { return nil }

// ShouldBindJSON is a shortcut for c.ShouldBindWith(obj, binding.JSON).
func (c *Context) ShouldBindJSON(obj any) error { return nil }

// Status sets the HTTP response code.
func (c *Context) Status(code int) {}

// Header is an intelligent shortcut for c.Writer.Header().Set(key, value).
// It writes a header in the response.
func (c *Context) Header(key, value string) {}

// GetHeader returns value from request headers.
func (c *Context) GetHeader(key string) string { return "" }

// SetCookie adds a Set-Cookie header to the ResponseWriter's headers.
func (c *Context) SetCookie(name, value string, maxAge int, path, domain string, secure, httpOnly bool) {}

// JSON serializes the given struct as JSON into the response body.
// It also sets the Content-Type as "application/json".
func (c *Context) JSON(code int, obj any) {}

// String writes the given string into the response body.
func (c *Context) String(code int, format string, values ...any) {}

// Redirect returns an HTTP redirect to the specific location.
func (c *Context) Redirect(code int, location string) {}

func (c *Context) reset() {}
