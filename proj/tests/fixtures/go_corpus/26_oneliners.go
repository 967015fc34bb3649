package oneliners

func tiny() int { x := 1; return x }

func also(y int) int { if y > 0 { return y }; return -y }

type wrapper struct{ v int }

func (w wrapper) get() int { return w.v }
