import os

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


def fixture(name):
    return os.path.join(FIXTURES, name)


def write_file(directory, name, text):
    """ Writes text to directory/name and returns the path """

    filename = os.path.join(directory, name)
    with open(filename, "w") as fh:
        fh.write(text)
    return filename
