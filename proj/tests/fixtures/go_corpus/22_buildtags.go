//go:build linux && amd64

package buildtags

import "unsafe"

func PageSize() uintptr {
	var x int
	return unsafe.Sizeof(x)
}

//go:nosplit
func fastPath(p unsafe.Pointer) unsafe.Pointer {
	return p
}
