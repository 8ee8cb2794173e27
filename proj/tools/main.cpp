#include <cstdio>

int main() {
    std::puts("lowthrust: command surface under construction");
    return 2;
}
