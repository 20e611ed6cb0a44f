package gin

// Accounts defines a key/value for user/pass list of authorized logins.
type Accounts map[string]string

// BasicAuth returns a Basic HTTP Authorization middleware. It takes as argument a map[string]string where
// the key is the user name and the value is the password.
func BasicAuth(accounts Accounts) HandlerFunc { return nil }

// Logger instances a Logger middleware that will write the logs to gin.DefaultWriter.
func Logger() HandlerFunc { return nil }

// Recovery returns a middleware that recovers from any panics and writes a 500 if there was one.
func Recovery() HandlerFunc { return nil }

// CreateTestContext returns a fresh engine and context for testing purposes.
func CreateTestContext(w ResponseWriter) (c *Context, r *Engine) { return nil, nil }
