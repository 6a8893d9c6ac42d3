#include "message_passing.hpp"

#include <cmath>

namespace xeval::detail {

ModelGradient::ModelGradient(const GnnModel& m) : scorer(m.scorer.size(), 0.0) {
  for (const DenseLayer& layer : m.layers) {
    weight.emplace_back(layer.weight.rows(), layer.weight.cols(), 0.0);
    bias.emplace_back(layer.bias.size(), 0.0);
  }
}

std::vector<double> ModelGradient::flatten() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < weight.size(); ++k) {
    out.insert(out.end(), weight[k].values().begin(), weight[k].values().end());
    out.insert(out.end(), bias[k].begin(), bias[k].end());
  }
  out.insert(out.end(), scorer.begin(), scorer.end());
  return out;
}

Matrix feature_matrix(const PropertyGraph& g) {
  Matrix x(g.node_count(), g.feature_dim());
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    const auto& f = g.node(v).features;
    std::copy(f.begin(), f.end(), x.row(v).begin());
  }
  return x;
}

Matrix aggregate(const PropertyGraph& g, const Matrix& h, const double* edge_weights) {
  Matrix out(h.rows(), h.cols());
  for (NodeIndex v = 0; v < h.rows(); ++v) {
    auto acc = out.row(v);
    auto self = h.row(v);
    std::copy(self.begin(), self.end(), acc.begin());
    const auto incident = g.incident(v);
    for (const Incidence& inc : incident) {
      auto src = h.row(inc.neighbor);
      if (edge_weights) {
        const double w = edge_weights[inc.edge];
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * src[i];
      } else {
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += src[i];
      }
    }
    const double count = static_cast<double>(incident.size() + 1);
    for (double& x : acc) x /= count;
  }
  return out;
}

ForwardTrace forward(const PropertyGraph& g, const GnnModel& m, const double* edge_weights) {
  ForwardTrace t;
  t.inputs.push_back(feature_matrix(g));
  for (const DenseLayer& layer : m.layers) {
    Matrix a = aggregate(g, t.inputs.back(), edge_weights);
    Matrix z(a.rows(), layer.weight.rows());
    Matrix h(a.rows(), layer.weight.rows());
    for (NodeIndex v = 0; v < a.rows(); ++v) {
      for (std::size_t o = 0; o < layer.weight.rows(); ++o) {
        const double pre = dot(layer.weight.row(o), a.row(v)) + layer.bias[o];
        z(v, o) = pre;
        h(v, o) = pre > 0.0 ? pre : 0.0;
      }
    }
    t.aggregated.push_back(std::move(a));
    t.preact.push_back(std::move(z));
    t.inputs.push_back(std::move(h));
  }
  return t;
}

void scorer_backward(const GnnModel& m, const Matrix& e, NodeIndex u, NodeIndex v, double d_logit,
                     Matrix& d_out, std::vector<double>* scorer_grad) {
  const std::size_t d = e.cols();
  auto hu = e.row(u);
  auto hv = e.row(v);
  auto du = d_out.row(u);
  auto dv = d_out.row(v);
  for (std::size_t i = 0; i < d; ++i) {
    const double a = m.scorer[i];
    const double c = m.scorer[d + i];
    du[i] += d_logit * (a + c * hv[i]);
    dv[i] += d_logit * (a + c * hu[i]);
    if (scorer_grad) {
      (*scorer_grad)[i] += d_logit * (hu[i] + hv[i]);
      (*scorer_grad)[d + i] += d_logit * hu[i] * hv[i];
    }
  }
}

void backward(const PropertyGraph& g, const GnnModel& m, const ForwardTrace& trace, Matrix d_out,
              const double* edge_weights, ModelGradient* model_grad,
              std::vector<double>* edge_grad) {
  Matrix d_h = std::move(d_out);
  for (std::size_t k = m.layers.size(); k-- > 0;) {
    const DenseLayer& layer = m.layers[k];
    const Matrix& a = trace.aggregated[k];
    const Matrix& z = trace.preact[k];
    const Matrix& h_in = trace.inputs[k];
    const std::size_t n = a.rows();
    const std::size_t in_dim = a.cols();
    const std::size_t out_dim = layer.weight.rows();

    Matrix d_a(n, in_dim);
    for (NodeIndex v = 0; v < n; ++v) {
      for (std::size_t o = 0; o < out_dim; ++o) {
        const double dz = z(v, o) > 0.0 ? d_h(v, o) : 0.0;
        if (dz == 0.0) continue;
        if (model_grad) {
          auto gw = model_grad->weight[k].row(o);
          auto av = a.row(v);
          for (std::size_t i = 0; i < in_dim; ++i) gw[i] += dz * av[i];
          model_grad->bias[k][o] += dz;
        }
        auto w = layer.weight.row(o);
        auto da = d_a.row(v);
        for (std::size_t i = 0; i < in_dim; ++i) da[i] += dz * w[i];
      }
    }

    const bool need_input_grad = k > 0;
    Matrix d_prev(need_input_grad ? n : 0, need_input_grad ? in_dim : 0);
    for (NodeIndex v = 0; v < n; ++v) {
      const auto incident = g.incident(v);
      const double scale = 1.0 / static_cast<double>(incident.size() + 1);
      auto da = d_a.row(v);
      if (need_input_grad) {
        auto dp = d_prev.row(v);
        for (std::size_t i = 0; i < in_dim; ++i) dp[i] += scale * da[i];
      }
      for (const Incidence& inc : incident) {
        const double w = edge_weights ? edge_weights[inc.edge] : 1.0;
        if (need_input_grad) {
          auto dp = d_prev.row(inc.neighbor);
          for (std::size_t i = 0; i < in_dim; ++i) dp[i] += scale * w * da[i];
        }
        if (edge_grad) (*edge_grad)[inc.edge] += scale * dot(da, h_in.row(inc.neighbor));
      }
    }
    d_h = std::move(d_prev);
  }
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace xeval::detail
