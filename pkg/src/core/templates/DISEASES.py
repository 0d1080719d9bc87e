DISEASES = [
    "diabetes",
    "asthma",
    "hypertension",
    "migraine",
    "arthritis",
    "anemia",
    "bronchitis",
    "psoriasis",
    "eczema",
    "gout",
    "influenza",
    "pneumonia",
    "tuberculosis",
    "malaria",
    "hepatitis",
    "lupus",
    "glaucoma",
    "osteoporosis",
    "sinusitis",
    "tonsillitis",
]
