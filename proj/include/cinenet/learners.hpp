#pragma once

#include <fstream>
#include <istream>
#include <memory>
#include <string>

#include "cinenet/common.hpp"
#include "cinenet/forest.hpp"
#include "cinenet/gbdt.hpp"
#include "cinenet/mlp.hpp"
#include "cinenet/model.hpp"
#include "cinenet/tree.hpp"

namespace cinenet {

/// Reads back any model written by Model::save, dispatching on the leading
/// kind token.
inline ModelPtr load_model(std::istream& in) {
  std::string kind;
  if (!(in >> kind)) throw ParseError("model: empty stream");
  if (kind == "tree") {
    DecisionTreeModel m;
    return std::make_unique<DecisionTreeModel>(DecisionTreeModel::load_body(in, m));
  }
  if (kind == "forest") {
    RandomForestModel m;
    return std::make_unique<RandomForestModel>(RandomForestModel::load_body(in, m));
  }
  if (kind == "gbdt") {
    GbdtModel m;
    return std::make_unique<GbdtModel>(GbdtModel::load_body(in, m));
  }
  if (kind == "mlp") {
    MlpModel m;
    return std::make_unique<MlpModel>(MlpModel::load_body(in, m));
  }
  throw ParseError("model: unknown kind '" + kind + "'");
}

inline ModelPtr load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("model: cannot open " + path);
  return load_model(in);
}

inline void save_model_file(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ComputeError("model: cannot write " + path);
  model.save(out);
}

}  // namespace cinenet
