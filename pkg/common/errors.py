"""Exception hierarchy shared by every package."""


class AttnAlignError(Exception):
    pass


class ShapeError(AttnAlignError, ValueError):

    def __init__(self, message, *shapes):
        if shapes:
            message = "{}: {}".format(message, ' vs '.join(str(tuple(s)) for s in shapes))
        super(ShapeError, self).__init__(message)
        self.shapes = tuple(tuple(s) for s in shapes)


class ContractError(AttnAlignError, ValueError):
    pass


class InvalidMaskError(ContractError):
    pass


class ConfigError(AttnAlignError, ValueError):

    def __init__(self, field, message):
        super(ConfigError, self).__init__("{}: {}".format(field, message))
        self.field = field


class UsageError(ConfigError):
    pass


class ParseError(AttnAlignError, ValueError):

    def __init__(self, path, line_number, message):
        super(ParseError, self).__init__("{}:{}: {}".format(path, line_number, message))
        self.path = path
        self.line_number = line_number


class ConsistencyError(AttnAlignError, ValueError):

    def __init__(self, message, ids=()):
        if ids:
            message = "{} (ids: {})".format(message, ', '.join(str(i) for i in ids))
        super(ConsistencyError, self).__init__(message)
        self.ids = tuple(ids)


class UndefinedInputError(AttnAlignError, ValueError):
    pass


class UndefinedCorrelation(AttnAlignError, ValueError):
    pass


class TrainingDiverged(AttnAlignError, RuntimeError):

    def __init__(self, epoch, batch_index, loss):
        super(TrainingDiverged, self).__init__("non-finite loss {} at epoch {} batch {}".format(loss, epoch, batch_index))
        self.epoch = epoch
        self.batch_index = batch_index
