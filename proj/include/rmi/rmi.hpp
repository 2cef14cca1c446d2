#pragma once

#include "rmi/classic_measures.hpp"
#include "rmi/corrected_measures.hpp"
#include "rmi/errors.hpp"
#include "rmi/log_math.hpp"
#include "rmi/omega.hpp"
#include "rmi/partitions.hpp"
#include "rmi/report.hpp"
