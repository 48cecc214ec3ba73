#pragma once

#include "pc2/basis_eval.hpp"
#include "pc2/bench.hpp"
#include "pc2/config.hpp"
#include "pc2/design.hpp"
#include "pc2/expression.hpp"
#include "pc2/io.hpp"
#include "pc2/lar.hpp"
#include "pc2/legendre.hpp"
#include "pc2/model.hpp"
#include "pc2/model_io.hpp"
#include "pc2/multi_index.hpp"
#include "pc2/operators.hpp"
#include "pc2/problem.hpp"
#include "pc2/solver.hpp"
#include "pc2/transform.hpp"
#include "pc2/uq.hpp"
