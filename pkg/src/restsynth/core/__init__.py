"""Terms, types, libraries and the typing judgment."""

from .library import Library, LibraryError, SemanticLibrary, Value, value_key
from .syntax import ParseError, parse_program, render_program
from .terms import Bind, Call, Expr, Guard, Let, MalformedProgram, Program, Proj, Return, Var, size
from .typecheck import TypeCheckResult, typecheck
from .types import (
    ELEM,
    IN,
    OUT,
    ArrayT,
    Field,
    FunType,
    Location,
    LocSet,
    ObjRef,
    Query,
    RecordT,
    StringT,
    Type,
    downgrade,
)

__all__ = [
    "ELEM", "IN", "OUT", "ArrayT", "Bind", "Call", "Expr", "Field", "FunType", "Guard", "Let",
    "Library", "LibraryError", "LocSet", "Location", "MalformedProgram", "ObjRef", "ParseError",
    "Program", "Proj", "Query", "RecordT", "Return", "SemanticLibrary", "StringT", "Type",
    "TypeCheckResult", "Value", "Var", "downgrade", "parse_program", "render_program", "size",
    "typecheck", "value_key",
]
