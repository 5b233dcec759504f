#ifndef LAME3_LAME3_HPP
#define LAME3_LAME3_HPP

#include "elliptic.hpp"
#include "errors.hpp"
#include "json_io.hpp"
#include "monodromy.hpp"
#include "recurrence.hpp"
#include "roots.hpp"
#include "sympoly.hpp"

#endif
