# (question pattern, label suffix); the label is "<disease> <suffix>"
QUESTION_TEMPLATES = [
    ("What is {disease}?", "definition"),
    ("Tell me about {disease}?", "definition"),
    ("What kind of disease is {disease}?", "definition"),
    ("Can you elaborate on {disease}?", "definition"),
    ("What are the symptoms of {disease}?", "symptoms"),
    ("How do I know if I have {disease}?", "symptoms"),
    ("What signs point to {disease}?", "symptoms"),
    ("Which symptoms does {disease} cause?", "symptoms"),
]
