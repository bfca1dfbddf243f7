#include <doctest.h>
TEST_SUITE_BEGIN("mc");
TEST_SUITE_END();
