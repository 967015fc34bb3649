package mixed

import (
	"errors"
	"sort"
)

type store struct {
	items []string
}

// Push keeps items sorted; it returns the insertion index.
func (s *store) Push(item string) int {
	i := sort.SearchStrings(s.items, item)
	s.items = append(s.items, "")
	copy(s.items[i+1:], s.items[i:])
	s.items[i] = item
	return i
}

func (s *store) Pop() (string, error) {
	if len(s.items) == 0 {
		return "", errors.New("empty { store }")
	}
	last := s.items[len(s.items)-1]
	s.items = s.items[:len(s.items)-1]
	return last, nil
}

type iter interface {
	Next() (string, bool)
}

func drain(it iter) []string {
	var out []string
	for {
		v, ok := it.Next()
		if !ok {
			return out
		}
		out = append(out, v)
	}
}

func keys(m map[string]struct{ hits int }) []string {
	out := make([]string, 0, len(m))
	for k := range m {
		out = append(out, k)
	}
	sort.Strings(out)
	return out
}
