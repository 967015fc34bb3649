package runes

func RuneBraces() (rune, rune) {
	open := '{'
	close := '}'
	return open, close
}

func Escapes() rune {
	q := '\''
	b := '\\'
	if q == b {
		return q
	}
	return b
}
