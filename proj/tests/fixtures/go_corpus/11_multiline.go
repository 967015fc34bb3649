package multiline

import "errors"

func Long(
	first int,
	second string,
	third []byte,
) (int, error) {
	if second == "" {
		return 0, errors.New("empty")
	}
	return first + len(third), nil
}

func Results() (
	count int,
	err error,
) {
	return 0, nil
}
