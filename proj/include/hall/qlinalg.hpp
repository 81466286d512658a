#pragma once
#include <vector>

#include "hall/rational.hpp"

namespace hall {

using QVector = std::vector<Rational>;
using QMatrix = std::vector<QVector>;  // list of rows

// Row-reduces in place; returns pivot columns.
std::vector<int> q_row_reduce(QMatrix& rows);
int q_rank(QMatrix rows);
// Basis of {x : x^T rows = 0}, i.e. linear relations among the rows.
QMatrix q_row_relations(const QMatrix& rows);
// Scales to coprime integers with a positive first nonzero entry.
QVector q_primitive(QVector v);

}  // namespace hall
