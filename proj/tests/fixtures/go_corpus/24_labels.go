package labels

func FindPair(grid [][]int, want int) (int, int) {
outer:
	for i := range grid {
		for j := range grid[i] {
			if grid[i][j] == want {
				return i, j
			}
			if grid[i][j] < 0 {
				continue outer
			}
		}
	}
	goto fail
fail:
	return -1, -1
}
