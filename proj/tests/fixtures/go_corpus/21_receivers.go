package receivers

type T struct{ n int }

func (_ T) Ignored() int { return 0 }

func (t T) Value() int { return t.n }

func ( s  *T ) Spaced() int { return s.n }

func (*T) NoName() string { return "bare pointer receiver" }
