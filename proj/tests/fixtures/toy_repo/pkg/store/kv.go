package store

type KV struct {
	m map[string]string
}

func New() *KV {
	return &KV{m: map[string]string{}}
}

func (kv *KV) Get(key string) (string, bool) {
	v, ok := kv.m[key]
	return v, ok
}

func (kv *KV) Put(key, value string) {
	kv.m[key] = value
}
