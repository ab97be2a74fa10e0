#pragma once

#include "pdreg/covpipe.hpp"
#include "pdreg/dataset.hpp"
#include "pdreg/errors.hpp"
#include "pdreg/estimators.hpp"
#include "pdreg/idea.hpp"
#include "pdreg/io.hpp"
#include "pdreg/kernels.hpp"
#include "pdreg/modelselect.hpp"
#include "pdreg/quadrature.hpp"
#include "pdreg/specfun.hpp"
