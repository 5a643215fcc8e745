// Reference rows for the three certified tables: conductor norms and local
// factors at the identifying primes 17, 13, 37, 29.
#ifndef K3HECKE_TESTS_GOLDEN_HPP
#define K3HECKE_TESTS_GOLDEN_HPP

#include "k3hecke/counting.hpp"

#include <vector>

namespace golden {

struct Row {
    int i;
    long p;
    long cond_norm;
    int weight;
    std::vector<long> coeffs;   // ascending
};

// transcendental K3 slot (weight 2)
inline const std::vector<Row>& table_X() {
    static const std::vector<Row> t = {
        {1, 17, 64,    2, {1, -6, 255, 3468, 73695, -501126, 24137569}},
        {2, 13, 3136,  2, {1, -2, 247, 676, 41743, -57122, 4826809}},
        {3, 37, 23104, 2, {1, 14, -185, -38332, -253265, 26238254, 2565726409L}},
        {4, 29, 61504, 2, {1, -38, -261, 43732, -219501, -26876678, 594823321L}},
    };
    return t;
}

// curve H^1 slot (weight 1)
inline const std::vector<Row>& table_A() {
    static const std::vector<Row> t = {
        {1, 17, 4096,    1, {1, -6, 15, -52, 255, -1734, 4913}},
        {2, 13, 25088,   1, {1, 4, 7, 40, 91, 676, 2197}},
        {3, 37, 184832,  1, {1, 4, 15, -152, 555, 5476, 50653}},
        {4, 29, 3936256, 1, {1, 4, 51, 216, 1479, 3364, 24389}},
    };
    return t;
}

// complementary weight-2 slot, conductor (1)
inline const std::vector<Row>& table_psi_prime() {
    static const std::vector<Row> t = {
        {1, 17, 1, 2, {1, 42, 1023, 19244, 295647, 3507882, 24137569}},
        {2, 13, 1, 2, {1, 34, 631, 8476, 106639, 971074, 4826809}},
        {3, 37, 1, 2, {1, 82, 4423, 201724, 6055087, 153681202, 2565726409L}},
        {4, 29, 1, 2, {1, 74, 3067, 94772, 2579347, 52338794, 594823321L}},
    };
    return t;
}

inline k3hecke::counting::EulerFactor to_factor(const Row& r) {
    k3hecke::counting::EulerFactor f;
    f.p = r.p;
    f.weight = r.weight;
    for (long c : r.coeffs) f.coeffs.emplace_back(c);
    return f;
}

} // namespace golden

#endif
