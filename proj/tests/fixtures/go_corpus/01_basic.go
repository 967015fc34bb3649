package basic

func Add(a, b int) int { return a + b }

func sub(a, b int) int {
	return a - b
}

func Mul(a, b int) int {
	result := a * b
	return result
}
