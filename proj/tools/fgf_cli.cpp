#include "fgf/cli.hpp"

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include <iostream>

int main(int argc, char** argv)
{
#ifdef __GLIBC__
    // Sample batches are allocated and freed every step; keep them off mmap.
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
    return fgf::cli_main(argc, argv, std::cout, std::cerr);
}
