## base class for everything raised by segrank
class Error(Exception):
    '''base class for exceptions in this package'''
    pass


class ConfigError(Error):
    '''raised when a run configuration or a parameter value is invalid.

    the command line exits with status 2 on this error
    '''
    exit_code = 2


class DataError(Error):
    '''raised when input data cannot be used.

    this covers unreadable files, malformed lines, queries that do not line
    up with their annotations and training sets a model cannot be fit on.
    the command line exits with status 3 on this error
    '''
    exit_code = 3


class InvariantError(Error):
    '''raised when an internal invariant does not hold.

    this should indicate a bug, never bad input.
    the command line exits with status 4 on this error
    '''
    exit_code = 4


class LoadError(DataError):
    '''raised when a file cannot be read'''
    pass


class ParseError(DataError):
    '''raised for a malformed line in an input file '''

    def __init__(self, message, filename=None, line_number=None):

        self.filename = filename
        self.line_number = line_number
        if line_number is not None:
            message = "%s:%d: %s" % (filename or "<input>", line_number, message)
        super(ParseError, self).__init__(message)


class EmptyQueryError(DataError):
    '''raised when a query has no tokens'''
    pass


class DimensionError(DataError):
    '''raised when a break vector does not fit its query'''
    pass


class EnumerationBoundError(DataError):
    '''raised when a query is too long to enumerate all its segmentations'''
    pass


class MembershipError(DataError):
    '''raised when a candidate is not part of the candidate list it is scored against'''
    pass


class AlignmentError(DataError):
    '''raised when a gold segmentation belongs to another query'''
    pass


class TrainingDataError(DataError):
    '''raised when training instances hold a single class only'''
    pass


class EvaluationError(DataError):
    '''raised when predictions and gold standards do not line up'''
    pass


class StatsError(DataError):
    '''raised when collection statistics cannot support a score'''
    pass


class UndefinedStatisticsError(StatsError):
    '''raised when n-gram statistics hold no token mass'''
    pass


class PreconditionError(DataError):
    '''raised when a document lacks a field an operation requires'''
    pass


class DegenerateLabelError(DataError):
    '''raised when relevance judgments carry a single grade only'''
    pass
