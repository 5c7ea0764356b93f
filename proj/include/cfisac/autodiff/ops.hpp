#pragma once

#include <vector>

#include "cfisac/autodiff/graph.hpp"

// Differentiable primitives. Elementwise binary ops broadcast any axis of extent 1.
// matmul broadcasts the batch axis only. Shape errors throw std::invalid_argument
// while the graph is being built.
namespace cfisac::ad {

enum class Axis { batch = 0, rows = 1, cols = 2 };

Var matmul(Var a, Var b);
/// Swaps rows and cols of every batch slice.
Var transpose(Var a);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var divide(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);

Var square(Var a);
Var sqrt(Var a);
Var log2(Var a);
Var relu(Var a);
/// max{0, x}; identical to relu, kept under its own name where it encodes a constraint clamp.
Var clamp_min_zero(Var a);

/// Softmax along the last axis.
Var row_softmax(Var a);
/// Normalises the last axis to zero mean, unit (biased) variance, then applies
/// gain and bias of shape (1, 1, cols).
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

Var concat(const std::vector<Var>& parts, Axis axis);
/// Slice [start, start + length) along `axis`.
Var slice(Var a, Axis axis, int start, int length);

Var sum(Var a, Axis axis);
Var sum_all(Var a);
Var mean_all(Var a);
/// Per-batch Frobenius norm, shape (batch, 1, 1).
Var frobenius_norm(Var a);
/// Per-batch power clip: identity when ||z||_F^2 <= budget, else sqrt(budget) z / ||z||_F.
/// The scaling branch is differentiated through the normalisation.
Var conditional_scale(Var z, double budget);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return hadamard(a, b); }
inline Var operator/(Var a, Var b) { return divide(a, b); }
inline Var operator*(double s, Var a) { return scale(a, s); }
inline Var operator+(Var a, double s) { return add_scalar(a, s); }
inline Var operator-(Var a) { return scale(a, -1.0); }

}  // namespace cfisac::ad
