"""Exception types shared across the package.

Both exceptions derive from ValueError so callers that do not care about
the distinction can catch a single builtin type.  The CLI maps InputError
to exit status 1 and FormatError to exit status 2.
"""


class InputError(ValueError):
    """A caller-supplied value violates a documented precondition."""


class FormatError(ValueError):
    """A file or byte stream does not match its documented layout.

    Messages should name the offending file and, where possible, the line
    number or byte offset.
    """
