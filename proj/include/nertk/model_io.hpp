#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "nertk/model.hpp"

namespace nertk {

// Model file layout: a text manifest
//
//   NERTK-MODEL 1
//   meta <key> <value>            (any number)
//   dims <char_dim> <char_hidden> <word_dim> <word_hidden>
//   dropout <value>
//   tags <K>            followed by K lines
//   char_vocab <N>      followed by N lines
//   word_vocab <N>      followed by N lines
//   mask <K*K digits> <K digits> <K digits>
//   tensor <name> <rows> <cols> <byte offset>   (one per tensor)
//   end
//
// followed by every tensor as little-endian IEEE-754 doubles in row-major
// order. Saving then loading reproduces the model bit for bit.
void save_model(std::ostream& out, const Model& model);
void save_model_file(const std::string& path, const Model& model);
Model load_model(std::istream& in);
Model load_model_file(const std::string& path);

}  // namespace nertk
