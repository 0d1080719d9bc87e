# synthetic answer phrasings keyed by label suffix; one is picked per label with the generator seed
ANSWER_TEMPLATES = {
    "definition": [
        "{Disease} is a medical condition; this entry gives its general definition.",
        "{Disease} is a disease whose definition and overview are summarised here.",
    ],
    "symptoms": [
        "Common symptoms of {disease} vary between patients; see a clinician for diagnosis.",
        "{Disease} symptoms usually develop gradually and should be assessed by a doctor.",
    ],
}

GENERIC_ANSWERS = [
    "This is the predefined answer for {disease} ({suffix}).",
    "Predefined information about {disease} ({suffix}).",
]
