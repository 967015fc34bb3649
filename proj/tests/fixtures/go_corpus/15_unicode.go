package unicode

func Δx(a, b float64) float64 {
	return b - a
}

func Grüße() string {
	return "héllo wörld {日本語}"
}

type Päckchen struct{ n int }

func (p Päckchen) Größe() int { return p.n }
