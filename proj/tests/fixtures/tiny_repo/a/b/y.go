package b

func Y() {}

type T struct{}

func (t T) M() int { return 2 }
