package interfaces

import "io"

type ReadCloser interface {
	Read(p []byte) (n int, err error)
	Close() error
}

type Nested interface {
	io.Reader
	Peek(n int) ([]byte, error)
}

func UseReader(r io.Reader) error {
	_, err := r.Read(nil)
	return err
}
