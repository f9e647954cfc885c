"""Constants used throughout the loop IR module."""

KEYWORDS = {
    "for", "while", "do", "if", "else", "return", "break", "continue",
    "sizeof", "struct", "union", "enum", "typedef", "goto", "switch", "case",
    "default",
}

# Storage classes and qualifiers accepted in declaration specifiers
STORAGE_CLASSES = {"static", "extern", "register", "inline", "auto"}
QUALIFIERS = {"const", "volatile", "restrict", "__restrict", "__restrict__"}
SIGNEDNESS = {"signed", "unsigned"}
BASE_TYPES = {"void", "char", "short", "int", "long", "float", "double", "_Bool"}
TYPEDEF_NAMES = {
    "size_t", "ptrdiff_t", "clock_t", "time_t",
    "int8_t", "int16_t", "int32_t", "int64_t",
    "uint8_t", "uint16_t", "uint32_t", "uint64_t",
}
TYPE_WORDS = BASE_TYPES | SIGNEDNESS | TYPEDEF_NAMES
SPECIFIER_WORDS = TYPE_WORDS | STORAGE_CLASSES | QUALIFIERS

# Element widths in bits, keyed by the base type word
TYPE_BITS = {
    "_Bool": 8, "char": 8, "short": 16, "int": 32, "long": 64, "float": 32,
    "double": 64, "size_t": 64, "ptrdiff_t": 64, "clock_t": 64, "time_t": 64,
    "int8_t": 8, "int16_t": 16, "int32_t": 32, "int64_t": 64,
    "uint8_t": 8, "uint16_t": 16, "uint32_t": 32, "uint64_t": 64,
}
DEFAULT_ELEM_BITS = 32

ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="}
COMPOUND_ASSIGN_OPS = ASSIGN_OPS - {"="}

BINARY_PRECEDENCE = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6,
    "<": 7, ">": 7, "<=": 7, ">=": 7,
    "<<": 8, ">>": 8,
    "+": 9, "-": 9,
    "*": 10, "/": 10, "%": 10,
}
PREFIX_OPS = {"-", "+", "!", "~", "*", "&", "++", "--"}
COMPARISON_OPS = {"<", "<=", ">", ">=", "!="}

# Simulator feature extraction
DEFAULT_TRIP_COUNT = 1024
MAX_STRIDE = 8

# Identifier canonicalization
CANONICAL_PREFIX = "var"
ROLE_ARRAY = "array"
ROLE_SCALAR = "scalar"
ROLE_FUNCTION = "function"

HARNESS_FUNCTION = "main"
