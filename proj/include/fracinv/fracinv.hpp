#pragma once

#include "fracinv/errors.hpp"
#include "fracinv/core.hpp"
#include "fracinv/tridiagonal.hpp"
#include "fracinv/mittag_leffler.hpp"
#include "fracinv/forward_l1.hpp"
#include "fracinv/forward_spectral.hpp"
#include "fracinv/goursat_kernel.hpp"
#include "fracinv/transmutation.hpp"
#include "fracinv/report.hpp"
#include "fracinv/uniqueness_lab.hpp"
#include "fracinv/reconstruction.hpp"
#include "fracinv/expression.hpp"
#include "fracinv/config_file.hpp"
#include "fracinv/io.hpp"
