package a

func X() int { return 1 }
