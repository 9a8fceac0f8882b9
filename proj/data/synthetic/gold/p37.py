def main():
    total = int(input("Enter a number: "))
    if total > 10:
        print("big")
    elif total > 5:
        print("medium")
    else:
        print("small")

main()
