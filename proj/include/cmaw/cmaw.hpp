#pragma once

#include "cmaw/constants.hpp"
#include "cmaw/error.hpp"
#include "cmaw/geometry.hpp"
#include "cmaw/em_kernel.hpp"
#include "cmaw/cma_core.hpp"
#include "cmaw/radiation.hpp"
#include "cmaw/touchstone.hpp"
#include "cmaw/conformal_array.hpp"
#include "cmaw/study.hpp"
