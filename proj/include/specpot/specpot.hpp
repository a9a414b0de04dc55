#pragma once

#include "specpot/duality.hpp"
#include "specpot/errors.hpp"
#include "specpot/est.hpp"
#include "specpot/random.hpp"
#include "specpot/scenario.hpp"
#include "specpot/spectral.hpp"
#include "specpot/system.hpp"
#include "specpot/tentropy.hpp"
#include "specpot/transfer.hpp"
