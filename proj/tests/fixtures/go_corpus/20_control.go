package control

func Classify(ch chan int, done chan struct{}) string {
	select {
	case v := <-ch:
		switch {
		case v < 0:
			return "negative"
		case v == 0:
			return "zero"
		default:
			return "positive"
		}
	case <-done:
		return "done"
	}
}

func Nested(n int) int {
	total := 0
	for i := 0; i < n; i++ {
		for j := 0; j < n; j++ {
			if (i+j)%2 == 0 {
				total++
			}
		}
	}
	return total
}
