package tags

type Record struct {
	Name  string `json:"name"`
	Value int    `json:"value,omitempty"`
	Odd   string `weird:"{not a brace}"`
}

func (r Record) Pair() (string, int) {
	return r.Name, r.Value
}

func WithTagParam(x struct {
	A string `json:"a"`
}) string {
	return x.A
}
