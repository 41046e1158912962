#pragma once

#include "qgheat/analysis.hpp"
#include "qgheat/closed_form.hpp"
#include "qgheat/csv.hpp"
#include "qgheat/eigen.hpp"
#include "qgheat/errors.hpp"
#include "qgheat/fit.hpp"
#include "qgheat/format.hpp"
#include "qgheat/graph.hpp"
#include "qgheat/heat_kernel.hpp"
#include "qgheat/mesh.hpp"
#include "qgheat/operators.hpp"
