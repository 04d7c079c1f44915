#pragma once

#define ROPEWARP_VERSION "0.1.0"
