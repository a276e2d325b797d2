#pragma once

#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "cinenet/common.hpp"

namespace cinenet {

/// Trained classifier. predict_proba returns row-stochastic rows; predict is
/// its argmax (first index on ties).
class Model {
 public:
  virtual ~Model() = default;
  virtual std::string kind() const = 0;
  virtual int n_features() const = 0;
  virtual int n_classes() const = 0;
  virtual Matrix predict_proba(const Matrix& X) const = 0;
  virtual void save(std::ostream& out) const = 0;

  std::vector<int> predict(const Matrix& X) const {
    Matrix proba = predict_proba(X);
    std::vector<int> out(proba.size());
    for (size_t i = 0; i < proba.size(); ++i) {
      int best = 0;
      for (size_t k = 1; k < proba[i].size(); ++k)
        if (proba[i][k] > proba[i][best]) best = static_cast<int>(k);
      out[i] = best;
    }
    return out;
  }

 protected:
  void check_width(const Matrix& X) const {
    for (const auto& row : X)
      if (static_cast<int>(row.size()) != n_features())
        throw ValidationError(kind() + ": input width " + std::to_string(row.size()) +
                              " does not match training width " + std::to_string(n_features()));
  }
};

using ModelPtr = std::unique_ptr<Model>;

namespace detail {

inline void expect_token(std::istream& in, const std::string& want, const std::string& what) {
  std::string got;
  if (!(in >> got) || got != want)
    throw ParseError("model load: expected " + what + " '" + want + "', got '" + got + "'");
}

inline long long read_ll(std::istream& in, const std::string& what) {
  long long v;
  if (!(in >> v)) throw ParseError("model load: bad " + what);
  return v;
}

inline double read_double(std::istream& in, const std::string& what) {
  std::string s;
  if (!(in >> s)) throw ParseError("model load: bad " + what);
  return parse_double(s, "model load " + what);
}

}  // namespace detail

}  // namespace cinenet
