package rawstrings

func Raw() string {
	s := `multi
line { with braces }
and "quotes" inside`
	return s
}

func RawFake() string {
	return `func Fake() { not real }`
}
