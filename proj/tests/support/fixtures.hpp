#pragma once

#include <vector>

#include "specpot/system.hpp"
#include "specpot/transfer.hpp"

namespace fixtures {

using specpot::FiniteSystem;
using specpot::TransferOperatorXd;
using specpot::Triplet;

// two-point cycle 0 <-> 1
inline FiniteSystem sys2() { return FiniteSystem({1, 0}); }

inline TransferOperatorXd sys2_op(double a, double b) {
    return specpot::make_operator<double>(sys2(), {{0, 1, a}, {1, 0, b}});
}

// identity map on three points
inline FiniteSystem sysi3() { return FiniteSystem({0, 1, 2}); }

inline TransferOperatorXd sysi3_op(double w0, double w1, double w2) {
    return specpot::make_operator<double>(sysi3(), {{0, 0, w0}, {1, 1, w1}, {2, 2, w2}});
}

// four points draining to the fixed point 0
inline FiniteSystem sysd4() { return FiniteSystem({0, 2, 0, 2}); }

inline TransferOperatorXd sysd4_op() {
    return specpot::make_operator<double>(sysd4(),
                                          {{0, 0, 1.0}, {2, 1, 1.0}, {0, 2, 1.0}, {2, 3, 1.0}});
}

// nilpotent: support 0 <- 1 only
inline FiniteSystem nilp2() { return FiniteSystem({0, 0}); }

inline TransferOperatorXd nilp2_op() {
    return specpot::make_operator<double>(nilp2(), {{0, 1, 1.0}});
}

}  // namespace fixtures
