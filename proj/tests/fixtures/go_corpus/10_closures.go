package closures

func Outer() func() int {
	counter := 0
	inner := func() int {
		counter++
		return counter
	}
	return inner
}

var topLevel = func() string { return "literal, not a declaration" }

func UsesDefer() {
	defer func() {
		recover()
	}()
}
