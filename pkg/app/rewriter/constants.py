"""Constants used throughout the rewriter module."""

PRAGMA_PREFIX = "#pragma clang loop"
PRAGMA_TEMPLATE = "#pragma clang loop vectorize_width({vf}) interleave_count({if_})"

# Trailing markers of framework pragmas; the inline form was split off a shared line
MARKER = "/*nv*/"
INLINE_MARKER = "/*nv+*/"
