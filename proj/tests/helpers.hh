////////////////////////////////////////////////////////////////////////////////
// helpers.hh
////////////////////////////////////////////////////////////////////////////////
// Shared randomized-input generators for the test suites.  Every test seeds
// its own engine so suites stay order-independent.
////////////////////////////////////////////////////////////////////////////////
#ifndef WGC_TEST_HELPERS_HH
#define WGC_TEST_HELPERS_HH

#include "core/tensor.hh"

#include <random>

namespace wgc::test {

inline SymTensor2 random_sym(std::mt19937_64 &g, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Vector6 v;
    for (int i = 0; i < 6; ++i) v[i] = n(g);
    return SymTensor2(v);
}

inline Vector3 random_vec3(std::mt19937_64 &g, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    return Vector3(n(g), n(g), n(g));
}

inline Matrix3 random_rotation(std::mt19937_64 &g) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Quaterniond q(n(g), n(g), n(g), n(g));
    q.normalize();
    return q.toRotationMatrix();
}

inline SymTensor2 rotate(const SymTensor2 &t, const Matrix3 &R) {
    return SymTensor2::from_matrix(R * t.matrix() * R.transpose());
}

inline ElasticTensor random_spd6(std::mt19937_64 &g,
                                 ElasticTensor::Kind kind = ElasticTensor::Kind::Stiffness,
                                 double ridge = 0.1) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix6 A;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) A(i, j) = n(g);
    Matrix6 M = A.transpose() * A + ridge * Matrix6::Identity();
    return {M, kind};
}

} // namespace wgc::test

#endif // WGC_TEST_HELPERS_HH
