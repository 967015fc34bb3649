package decls

const (
	KindA = iota
	KindB
	KindC
)

var (
	registry = map[string]int{
		"a": 1,
		"b": 2,
	}
	keys = []string{"a", "b"}
)

func Lookup(k string) (int, bool) {
	v, ok := registry[k]
	return v, ok
}
