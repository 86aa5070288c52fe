#pragma once

#include <bit>
#include <cstdint>
#include <cstring>

namespace gdlnn::bits {

inline int words_for(int n) { return n <= 0 ? 1 : (n + 63) / 64; }

inline void set(std::uint64_t* m, int i) { m[i >> 6] |= std::uint64_t{1} << (i & 63); }
inline void clear(std::uint64_t* m, int i) { m[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
inline bool test(const std::uint64_t* m, int i) { return (m[i >> 6] >> (i & 63)) & 1; }

inline bool empty(const std::uint64_t* m, int words) {
    for (int w = 0; w < words; ++w) {
        if (m[w]) return false;
    }
    return true;
}

inline bool intersects(const std::uint64_t* a, const std::uint64_t* b, int words) {
    for (int w = 0; w < words; ++w) {
        if (a[w] & b[w]) return true;
    }
    return false;
}

inline int popcount(const std::uint64_t* m, int words) {
    int total = 0;
    for (int w = 0; w < words; ++w) total += std::popcount(m[w]);
    return total;
}

inline int popcount_and(const std::uint64_t* a, const std::uint64_t* b, int words) {
    int total = 0;
    for (int w = 0; w < words; ++w) total += std::popcount(a[w] & b[w]);
    return total;
}

inline int popcount_andnot(const std::uint64_t* a, const std::uint64_t* b, int words) {
    int total = 0;
    for (int w = 0; w < words; ++w) total += std::popcount(a[w] & ~b[w]);
    return total;
}

inline bool equal(const std::uint64_t* a, const std::uint64_t* b, int words) {
    return std::memcmp(a, b, static_cast<std::size_t>(words) * 8) == 0;
}

template <typename Fn>
inline void for_each(const std::uint64_t* m, int words, Fn&& fn) {
    for (int w = 0; w < words; ++w) {
        std::uint64_t x = m[w];
        while (x) {
            fn(w * 64 + std::countr_zero(x));
            x &= x - 1;
        }
    }
}

}  // namespace gdlnn::bits
