package main

// Package level comment.
// Continues here.
func main() {
	s := "quoted // marker"
	_ = s /* inline block */
}
