import os
import sys

# permite `import main` e `import accent_forge` a partir da raiz
sys.path.insert(0, os.path.dirname(__file__))
