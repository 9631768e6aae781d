#include <cstdio>
int main() { std::puts("toep placeholder"); return 0; }
