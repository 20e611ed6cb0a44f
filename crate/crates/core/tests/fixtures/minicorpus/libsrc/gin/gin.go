package gin

import "net/http"

// HandlerFunc defines the handler used by gin middleware as return value.
type HandlerFunc func(*Context)

// H is a shortcut for map[string]any.
type H map[string]any

// Engine is the framework's instance, it contains the muxer, middleware and configuration settings.
type Engine struct {
	RouterGroup
	trees map[string]*node
}

// New returns a new blank Engine instance without any middleware attached.
func New() *Engine {
	engine := &Engine{}
	engine.RouterGroup.engine = engine
	return engine
}

// Default returns an Engine instance with the Logger and Recovery middleware already attached.
func Default() *Engine {
	engine := New()
	engine.Use(Logger(), Recovery())
	return engine
}

// Use attaches a global middleware to the router. Included in the handlers chain for every single request.
func (engine *Engine) Use(middleware ...HandlerFunc) IRoutes {
	engine.RouterGroup.Use(middleware...)
	return engine
}

// Run attaches the router to a http.Server and starts listening and serving HTTP requests.
// It is a shortcut for http.ListenAndServe(addr, router).
func (engine *Engine) Run(addr ...string) (err error) {
	return http.ListenAndServe(resolveAddress(addr), engine)
}

func (engine *Engine) ServeHTTP(w http.ResponseWriter, req *http.Request) {
	engine.handleHTTPRequest(w, req)
}

// SetMode sets gin mode according to input string.
func SetMode(value string) {
	ginMode = value
}
