package structreturn

func Point() struct{ X, Y int } {
	return struct{ X, Y int }{1, 2}
}

func Set() map[string]struct{} {
	return map[string]struct{}{"a": {}}
}

func Iface() interface{ Error() string } {
	return nil
}

func FuncResult() func() struct{ N int } {
	return func() struct{ N int } { return struct{ N int }{3} }
}
