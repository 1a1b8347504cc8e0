#include <cstdio>
int main(){ std::puts("thbbpx: placeholder"); return 0; }
