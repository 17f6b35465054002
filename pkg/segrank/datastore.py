import io
import csv
import logging

logger = logging.getLogger(__name__)


def _format_cell(value):

    if isinstance(value, float):
        return "%.6f" % value
    if value is None:
        return ""
    return str(value)


class TSVStore(object):
    """ Class that wraps storing report rows in a tab separated file

    Parameters
    ----------
    fields: list
        A list of columns for the table
    filename: string
        Full path to the output file, or None to only render the table

    Attributes
    ----------
    fields: list
        A list of columns for the table
    filename: string
        Full path to the output file
    rows: list of dictionaries
        The rows stored so far
    comments: list of strings
        Lines written after the table, each prefixed with "# "

    Methods
    -------
    store(data)
        Appends a row to the table
    comment(line)
        Appends an annotation line
    dumps()
        Renders the table as text
    """

    def __init__(self, fields, filename=None):

        self.filename = filename
        self.fields = list(fields)
        self.rows = list()
        self.comments = list()

    def __str__(self):

        return "TSVStore: filename = %s, fields = %s" % (self.filename,
                                                         ", ".join(self.fields))

    def store(self, data):
        """ Appends the data to the table

        Parameters
        ----------
        data: dictionary
            The data to store. The keys should match the fields specified when
            creating the TSVStore; missing fields are left empty.

        Returns
        -------
        bool
            True if store succeeded
        """
        self.rows.append(dict((field, data.get(field)) for field in self.fields))
        return True

    def comment(self, line):

        self.comments.append(line)

    def dumps(self):
        """ Renders the table. Floats are written with six decimals. """

        buffer = io.StringIO()
        writer = csv.writer(buffer, delimiter="\t", lineterminator="\n")
        writer.writerow(self.fields)
        for row in self.rows:
            writer.writerow([_format_cell(row[field]) for field in self.fields])
        for line in self.comments:
            buffer.write("# %s\n" % line)
        logger.debug("Rendered %d rows of %s" % (len(self.rows), self.filename or "a table"))
        return buffer.getvalue()
