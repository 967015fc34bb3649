package methods

type Buffer struct {
	data []byte
}

type Server struct {
	addr string
}

func (b Buffer) Len() int { return len(b.data) }

func (s *Server) Serve() error {
	return nil
}

func (s *Server) Close() error {
	s.addr = ""
	return nil
}
