#pragma once

#include "sbc/adjoint.hpp"
#include "sbc/errors.hpp"
#include "sbc/galerkin.hpp"
#include "sbc/gramian.hpp"
#include "sbc/hum.hpp"
#include "sbc/io.hpp"
#include "sbc/scalar.hpp"
#include "sbc/simulate.hpp"
#include "sbc/spaces.hpp"
#include "sbc/system.hpp"
