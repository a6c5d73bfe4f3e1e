# -*- coding: utf-8 -*-
#
# CyBeR-0 Simulator documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing dir.

import sys, os

# Lets autodoc import the cyber0 package from the source tree.
sys.path.insert(0, os.path.abspath('../..'))

# -- General configuration -----------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.doctest', 'sphinx.ext.todo', 'sphinx.ext.viewcode']

templates_path = ['_templates']

# The suffix of source filenames.
source_suffix = '.rst'

# The master toctree document.
master_doc = 'index'

# General information about the project.
project = u'CyBeR-0 Simulator'
copyright = u'2024-2026, The CyBeR-0 Simulator Contributors'

# The short X.Y version.
version = '0.5'
# The full version, including alpha/beta/rc tags.
release = '0.5.0'

exclude_patterns = []

# The name of the Pygments (syntax highlighting) style to use.
pygments_style = 'sphinx'


# -- Options for HTML output ---------------------------------------------------

html_theme = 'default'

html_static_path = ['_static']

# Output file base name for HTML help builder.
htmlhelp_basename = 'Cyber0doc'


# -- Options for LaTeX output --------------------------------------------------

latex_elements = {}

# (source start file, target name, title, author, documentclass [howto/manual]).
latex_documents = [
  ('index', 'Cyber0.tex', u'CyBeR-0 Simulator Documentation',
   u'The CyBeR-0 Simulator Contributors', 'manual'),
]


# -- Options for manual page output --------------------------------------------

# (source start file, name, description, authors, manual section).
man_pages = [
    ('index', 'cyber0', u'CyBeR-0 Simulator Documentation',
     [u'The CyBeR-0 Simulator Contributors'], 1)
]
