package constraints

type Number interface {
	~int | ~int64 | ~float64
}

type Ordered interface {
	Number | ~string
}

func Max[T Ordered](a, b T) T {
	if a > b {
		return a
	}
	return b
}

func SumAll[T Number](xs []T) T {
	var total T
	for _, x := range xs {
		total += x
	}
	return total
}

func Pair[K comparable, V any](k K, v V) (K, V) { return k, v }
