package comments

// func CommentedOut() { never parsed }
func Real() int {
	// a { stray brace in comment
	return 1 // trailing }
}

/*
func BlockCommented() {
	also never parsed {
}
*/
func AfterBlock() int {
	/* inline { comment } */
	return 2
}
