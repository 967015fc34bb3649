package functype

type Handler func(code int) error

type Middleware func(Handler) Handler

func Apply(h Handler, m Middleware) Handler {
	return m(h)
}

var Default Handler = func(code int) error { return nil }
