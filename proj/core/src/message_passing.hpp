#pragma once

#include <vector>

#include "xeval/gnn.hpp"

namespace xeval::detail {

struct ForwardTrace {
  std::vector<Matrix> inputs;      // inputs[k] feeds layer k; inputs[0] is the feature matrix
  std::vector<Matrix> aggregated;  // mean-aggregated input of layer k
  std::vector<Matrix> preact;      // W a + b of layer k

  const Matrix& output() const { return inputs.back(); }
};

struct ModelGradient {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;
  std::vector<double> scorer;

  explicit ModelGradient(const GnnModel& m);
  std::vector<double> flatten() const;
};

Matrix feature_matrix(const PropertyGraph& g);

// edge_weights may be null, meaning every edge weight is exactly 1.
Matrix aggregate(const PropertyGraph& g, const Matrix& h, const double* edge_weights);

ForwardTrace forward(const PropertyGraph& g, const GnnModel& m, const double* edge_weights);

// Adds d(logit)/d(rows) scaled by `d_logit` into d_out, and the scorer
// gradient into scorer_grad when non-null.
void scorer_backward(const GnnModel& m, const Matrix& e, NodeIndex u, NodeIndex v, double d_logit,
                     Matrix& d_out, std::vector<double>* scorer_grad);

// Backpropagates d_out (gradient w.r.t. the final embeddings) through every
// layer. model_grad and edge_grad are accumulated into when non-null.
void backward(const PropertyGraph& g, const GnnModel& m, const ForwardTrace& trace, Matrix d_out,
              const double* edge_weights, ModelGradient* model_grad,
              std::vector<double>* edge_grad);

// log(1 + exp(x)) without overflow.
double softplus(double x);

}  // namespace xeval::detail
