package strings

func Braces() string {
	s := "a { b } c"
	t := "escaped \" and { brace"
	u := "backslash \\"
	return s + t + u
}

func Quoted() string {
	return "func NotADecl() { }"
}
