class CacError(Exception):
    pass


class ParseError(CacError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class SignatureError(CacError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class TypingError(CacError):
    pass


class InvalidPosition(CacError, IndexError):
    pass


class OutOfFuel(CacError):
    def __init__(self, fuel, term=None):
        self.fuel = fuel
        self.term = term
        super().__init__(f"fuel of {fuel} steps exhausted")
