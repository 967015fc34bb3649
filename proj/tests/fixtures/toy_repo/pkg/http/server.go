package http

import "errors"

type Server struct {
	addr    string
	started bool
}

func NewServer(addr string) *Server {
	return &Server{addr: addr}
}

func (s *Server) Serve() error {
	if s.started {
		return errors.New("already started")
	}
	s.started = true
	return nil
}

func (s *Server) Shutdown() error {
	s.started = false
	return nil
}
